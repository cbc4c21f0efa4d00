//! Exact-area shapes, rigid motions and convex overlap measurement.
//!
//! Everything downstream (density, constraint violation, rendering) is built
//! on the two motif kinds defined here: a regular polygon given by vertex
//! count, circumradius, center and rotation, and a disc given by radius and
//! center. Overlap between two motifs is measured as a penetration depth:
//! the minimum translation distance that separates the pair, zero when the
//! interiors are disjoint.

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

pub const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Error, PartialEq)]
pub enum ShapeError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(u32),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
}

/// A packing motif: a regular `n`-gon or a disc.
///
/// Polygon vertices are `center + circumradius * (cos(rotation + 2πk/n),
/// sin(rotation + 2πk/n))` for `k = 0..n`, so the polygon is always convex
/// and regular. The rotation is stored reduced to `[0, 2π/n)`; larger angles
/// are redundant under the n-gon's own symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Polygon {
        n: u32,
        circumradius: f64,
        center: Vec2,
        rotation: f64,
    },
    Disc {
        radius: f64,
        center: Vec2,
    },
}

/// Reduce an angle to `[0, 2π/n)`.
fn reduce_rotation(rotation: f64, n: u32) -> f64 {
    let period = TAU / n as f64;
    let mut r = rotation.rem_euclid(period);
    // rem_euclid can return the period itself when rotation is a tiny
    // negative multiple of it.
    if r >= period {
        r -= period;
    }
    r
}

/// Regular n-gon constructor; rejects `n < 3` and non-positive radii.
pub fn make_regular_ngon(
    n: u32,
    circumradius: f64,
    center: Vec2,
    rotation: f64,
) -> Result<Shape, ShapeError> {
    if n < 3 {
        return Err(ShapeError::TooFewVertices(n));
    }
    if !(circumradius > 0.0) {
        return Err(ShapeError::NonPositiveRadius(circumradius));
    }
    Ok(Shape::Polygon {
        n,
        circumradius,
        center,
        rotation: reduce_rotation(rotation, n),
    })
}

pub fn make_disc(radius: f64, center: Vec2) -> Result<Shape, ShapeError> {
    if !(radius > 0.0) {
        return Err(ShapeError::NonPositiveRadius(radius));
    }
    Ok(Shape::Disc { radius, center })
}

impl Shape {
    /// Closed-form area: `(n/2) r² sin(2π/n)` for the polygon, `π r²` for
    /// the disc.
    pub fn area(&self) -> f64 {
        match *self {
            Shape::Polygon {
                n, circumradius, ..
            } => 0.5 * n as f64 * circumradius * circumradius * (TAU / n as f64).sin(),
            Shape::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    /// Longest chord: `2r sin(⌊n/2⌋ π/n)` for the polygon, `2r` for the disc.
    pub fn diameter(&self) -> f64 {
        match *self {
            Shape::Polygon {
                n, circumradius, ..
            } => {
                let k = (n / 2) as f64;
                2.0 * circumradius * (k * std::f64::consts::PI / n as f64).sin()
            }
            Shape::Disc { radius, .. } => 2.0 * radius,
        }
    }

    /// Minimum caliper width: the smallest distance between parallel support
    /// lines. Equals `2r cos(π/n)` for even n-gons, `r (1 + cos(π/n))` for
    /// odd ones, and `2r` for the disc. A lattice generator shorter than
    /// this always makes the motif overlap its own translate.
    pub fn width(&self) -> f64 {
        match *self {
            Shape::Polygon {
                n, circumradius, ..
            } => {
                let half = (std::f64::consts::PI / n as f64).cos();
                if n % 2 == 0 {
                    2.0 * circumradius * half
                } else {
                    circumradius * (1.0 + half)
                }
            }
            Shape::Disc { radius, .. } => 2.0 * radius,
        }
    }

    pub fn center(&self) -> Vec2 {
        match *self {
            Shape::Polygon { center, .. } | Shape::Disc { center, .. } => center,
        }
    }

    /// Polygon vertices in counterclockwise order; empty for a disc.
    pub fn vertices(&self) -> Vec<Vec2> {
        match *self {
            Shape::Polygon {
                n,
                circumradius,
                center,
                rotation,
            } => (0..n)
                .map(|k| {
                    let ang = rotation + TAU * k as f64 / n as f64;
                    center + circumradius * Vec2::new(ang.cos(), ang.sin())
                })
                .collect(),
            Shape::Disc { .. } => Vec::new(),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        PreparedShape::new(self).contains(p)
    }
}

/// A plane isometry `x ↦ L x + t` with `L` orthogonal (det ±1).
#[derive(Debug, Clone, Copy)]
pub struct Isometry {
    pub linear: Mat2,
    pub translation: Vec2,
}

impl Isometry {
    pub fn new(linear: Mat2, translation: Vec2) -> Self {
        debug_assert!(
            (linear.transpose() * linear - Mat2::identity()).norm() < 1e-12,
            "isometry linear part must be orthogonal"
        );
        Isometry {
            linear,
            translation,
        }
    }

    pub fn translation_only(t: Vec2) -> Self {
        Isometry {
            linear: Mat2::identity(),
            translation: t,
        }
    }

    pub fn rotation_about(angle: f64, pivot: Vec2) -> Self {
        let (s, c) = angle.sin_cos();
        let linear = Mat2::new(c, -s, s, c);
        Isometry {
            linear,
            translation: pivot - linear * pivot,
        }
    }

    /// Reflection across the line through the origin at `axis_angle`.
    pub fn reflection(axis_angle: f64) -> Self {
        let (s, c) = (2.0 * axis_angle).sin_cos();
        Isometry {
            linear: Mat2::new(c, s, s, -c),
            translation: Vec2::zeros(),
        }
    }

    pub fn apply_point(&self, p: Vec2) -> Vec2 {
        self.linear * p + self.translation
    }

    pub fn det(&self) -> f64 {
        self.linear.determinant()
    }
}

/// Image of a shape under an isometry.
///
/// The center maps through the full isometry. A polygon's rotation picks up
/// the rotation angle of the linear part; a reflective isometry maps the
/// vertex set to `2ψ − angles`, which is again a regular n-gon because the
/// n-gon is mirror symmetric. Area is preserved exactly (it only depends on
/// n and circumradius).
pub fn apply_isometry(s: &Shape, g: &Isometry) -> Shape {
    match *s {
        Shape::Disc { radius, center } => Shape::Disc {
            radius,
            center: g.apply_point(center),
        },
        Shape::Polygon {
            n,
            circumradius,
            center,
            rotation,
        } => {
            // atan2(L10, L00) is the rotation angle for det +1 and twice the
            // mirror axis angle for det -1.
            let phi = g.linear[(1, 0)].atan2(g.linear[(0, 0)]);
            let rot = if g.det() > 0.0 {
                rotation + phi
            } else {
                phi - rotation
            };
            Shape::Polygon {
                n,
                circumradius,
                center: g.apply_point(center),
                rotation: reduce_rotation(rot, n),
            }
        }
    }
}

/// Precomputed geometry for the overlap kernels: polygon vertices and unit
/// edge normals, or the disc parameters. Neighbor-cell copies are pure
/// translations, so one `PreparedShape` serves a whole orbit member across
/// all lattice offsets via the `offset` arguments below.
#[derive(Debug, Clone)]
pub enum PreparedShape {
    Poly { verts: Vec<Vec2>, axes: Vec<Vec2> },
    Disc { center: Vec2, radius: f64 },
}

impl PreparedShape {
    pub fn new(shape: &Shape) -> Self {
        match *shape {
            Shape::Disc { radius, center } => PreparedShape::Disc { center, radius },
            Shape::Polygon { .. } => {
                let verts = shape.vertices();
                let n = verts.len();
                // Vertices are counterclockwise, so (e.y, -e.x) points outward.
                let axes = (0..n)
                    .map(|i| {
                        let e = verts[(i + 1) % n] - verts[i];
                        Vec2::new(e.y, -e.x).normalize()
                    })
                    .collect();
                PreparedShape::Poly { verts, axes }
            }
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            PreparedShape::Disc { center, radius } => (p - center).norm_squared() <= radius * radius,
            PreparedShape::Poly { verts, axes } => {
                // Inside iff on the inner side of every edge line.
                verts
                    .iter()
                    .zip(axes.iter())
                    .all(|(v, a)| a.dot(&(p - v)) <= 0.0)
            }
        }
    }
}

fn project_verts(verts: &[Vec2], offset: Vec2, axis: Vec2) -> (f64, f64) {
    let shift = offset.dot(&axis);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in verts {
        let p = v.dot(&axis);
        if p < lo {
            lo = p;
        }
        if p > hi {
            hi = p;
        }
    }
    (lo + shift, hi + shift)
}

fn poly_poly_depth(
    averts: &[Vec2],
    aaxes: &[Vec2],
    aoff: Vec2,
    bverts: &[Vec2],
    baxes: &[Vec2],
    boff: Vec2,
) -> f64 {
    let mut depth = f64::INFINITY;
    for axis in aaxes.iter().chain(baxes.iter()) {
        let (alo, ahi) = project_verts(averts, aoff, *axis);
        let (blo, bhi) = project_verts(bverts, boff, *axis);
        let overlap = ahi.min(bhi) - alo.max(blo);
        if overlap <= 0.0 {
            return 0.0;
        }
        if overlap < depth {
            depth = overlap;
        }
    }
    depth
}

fn poly_disc_depth(verts: &[Vec2], axes: &[Vec2], poff: Vec2, center: Vec2, radius: f64) -> f64 {
    let mut depth = f64::INFINITY;
    for axis in axes {
        let (plo, phi) = project_verts(verts, poff, *axis);
        let c = center.dot(axis);
        let overlap = phi.min(c + radius) - plo.max(c - radius);
        if overlap <= 0.0 {
            return 0.0;
        }
        if overlap < depth {
            depth = overlap;
        }
    }
    // Extra axis toward the nearest vertex handles the corner regions.
    let mut best = f64::INFINITY;
    let mut nearest = Vec2::zeros();
    for v in verts {
        let d = (v + poff - center).norm_squared();
        if d < best {
            best = d;
            nearest = v + poff;
        }
    }
    let dir = center - nearest;
    let norm = dir.norm();
    if norm > 1e-300 {
        let axis = dir / norm;
        let (plo, phi) = project_verts(verts, poff, axis);
        let c = center.dot(&axis);
        let overlap = phi.min(c + radius) - plo.max(c - radius);
        if overlap <= 0.0 {
            return 0.0;
        }
        if overlap < depth {
            depth = overlap;
        }
    }
    depth
}

/// Penetration depth of `a` translated by `aoff` against `b` translated by
/// `boff`: zero when interiors are disjoint (touching counts as disjoint),
/// otherwise the minimum translation distance separating the pair.
pub fn penetration_depth_offset(
    a: &PreparedShape,
    aoff: Vec2,
    b: &PreparedShape,
    boff: Vec2,
) -> f64 {
    match (a, b) {
        (
            PreparedShape::Disc {
                center: ca,
                radius: ra,
            },
            PreparedShape::Disc {
                center: cb,
                radius: rb,
            },
        ) => {
            let d = ((ca + aoff) - (cb + boff)).norm();
            (ra + rb - d).max(0.0)
        }
        (
            PreparedShape::Poly { verts, axes },
            PreparedShape::Disc { center, radius },
        ) => poly_disc_depth(verts, axes, aoff, center + boff, *radius),
        (
            PreparedShape::Disc { center, radius },
            PreparedShape::Poly { verts, axes },
        ) => poly_disc_depth(verts, axes, boff, center + aoff, *radius),
        (
            PreparedShape::Poly {
                verts: av,
                axes: aa,
            },
            PreparedShape::Poly {
                verts: bv,
                axes: ba,
            },
        ) => poly_poly_depth(av, aa, aoff, bv, ba, boff),
    }
}

/// Separating-axis penetration depth between two shapes.
pub fn penetration_depth(a: &Shape, b: &Shape) -> f64 {
    penetration_depth_offset(
        &PreparedShape::new(a),
        Vec2::zeros(),
        &PreparedShape::new(b),
        Vec2::zeros(),
    )
}

fn segment_distance(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> f64 {
    fn point_seg(p: Vec2, a: Vec2, b: Vec2) -> f64 {
        let ab = b - a;
        let t = (p - a).dot(&ab) / ab.norm_squared().max(1e-300);
        let t = t.clamp(0.0, 1.0);
        (p - (a + t * ab)).norm()
    }
    point_seg(p1, q1, q2)
        .min(point_seg(p2, q1, q2))
        .min(point_seg(q1, p1, p2))
        .min(point_seg(q2, p1, p2))
}

fn point_to_poly_distance(p: Vec2, verts: &[Vec2], axes: &[Vec2], poff: Vec2) -> f64 {
    let inside = verts
        .iter()
        .zip(axes.iter())
        .all(|(v, a)| a.dot(&(p - v - poff)) <= 0.0);
    if inside {
        return 0.0;
    }
    let n = verts.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = verts[i] + poff;
        let b = verts[(i + 1) % n] + poff;
        let ab = b - a;
        let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        let d = (p - (a + t * ab)).norm();
        if d < best {
            best = d;
        }
    }
    best
}

/// Distance of closest approach between two shapes; zero when they overlap
/// or touch. Used for contact counting, not in the search hot path.
pub fn separation_gap(a: &PreparedShape, aoff: Vec2, b: &PreparedShape, boff: Vec2) -> f64 {
    match (a, b) {
        (
            PreparedShape::Disc {
                center: ca,
                radius: ra,
            },
            PreparedShape::Disc {
                center: cb,
                radius: rb,
            },
        ) => {
            let d = ((ca + aoff) - (cb + boff)).norm();
            (d - ra - rb).max(0.0)
        }
        (PreparedShape::Poly { verts, axes }, PreparedShape::Disc { center, radius }) => {
            (point_to_poly_distance(center + boff, verts, axes, aoff) - radius).max(0.0)
        }
        (PreparedShape::Disc { center, radius }, PreparedShape::Poly { verts, axes }) => {
            (point_to_poly_distance(center + aoff, verts, axes, boff) - radius).max(0.0)
        }
        (
            PreparedShape::Poly {
                verts: av,
                axes: aa,
            },
            PreparedShape::Poly {
                verts: bv,
                axes: ba,
            },
        ) => {
            if poly_poly_depth(av, aa, aoff, bv, ba, boff) > 0.0 {
                return 0.0;
            }
            let na = av.len();
            let nb = bv.len();
            let mut best = f64::INFINITY;
            for i in 0..na {
                let a1 = av[i] + aoff;
                let a2 = av[(i + 1) % na] + aoff;
                for j in 0..nb {
                    let b1 = bv[j] + boff;
                    let b2 = bv[(j + 1) % nb] + boff;
                    let d = segment_distance(a1, a2, b1, b2);
                    if d < best {
                        best = d;
                    }
                }
            }
            best
        }
    }
}
