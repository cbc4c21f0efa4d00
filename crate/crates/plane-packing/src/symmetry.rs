//! The 17 plane groups: cell constraints, symmetry operations modulo
//! lattice translations, asymmetric-unit boxes, and the torus-to-
//! configuration decoding used by the search.
//!
//! Operations are stored as integer matrices plus half-integer translations
//! in fractional coordinates, which keeps group closure checkable in exact
//! arithmetic. The centered groups `cm` and `c2mm` are expressed in their
//! primitive rhombic cells (equal generators, free angle) so the density
//! formula `N area(K) / area(cell)` stays uniform over all 17 groups; their
//! multiplicities are 2 and 4.

use crate::geometry::{apply_isometry, Isometry, Mat2, Shape, Vec2, TAU};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SymmetryError {
    #[error("unknown plane group name: {0}")]
    UnknownGroup(String),
    #[error("cell parameters violate the {0:?} constraint")]
    CellConstraint(CellKind),
    #[error("degenerate cell: determinant {0} is not positive")]
    DegenerateCell(f64),
}

/// IUCr names of the 17 plane groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum GroupName {
    p1,
    p2,
    pm,
    pg,
    cm,
    p2mm,
    p2mg,
    p2gg,
    c2mm,
    p4,
    p4mm,
    p4gm,
    p3,
    p3m1,
    p31m,
    p6,
    p6mm,
}

pub const GROUP_NAMES: [GroupName; 17] = [
    GroupName::p1,
    GroupName::p2,
    GroupName::pm,
    GroupName::pg,
    GroupName::cm,
    GroupName::p2mm,
    GroupName::p2mg,
    GroupName::p2gg,
    GroupName::c2mm,
    GroupName::p4,
    GroupName::p4mm,
    GroupName::p4gm,
    GroupName::p3,
    GroupName::p3m1,
    GroupName::p31m,
    GroupName::p6,
    GroupName::p6mm,
];

impl GroupName {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupName::p1 => "p1",
            GroupName::p2 => "p2",
            GroupName::pm => "pm",
            GroupName::pg => "pg",
            GroupName::cm => "cm",
            GroupName::p2mm => "p2mm",
            GroupName::p2mg => "p2mg",
            GroupName::p2gg => "p2gg",
            GroupName::c2mm => "c2mm",
            GroupName::p4 => "p4",
            GroupName::p4mm => "p4mm",
            GroupName::p4gm => "p4gm",
            GroupName::p3 => "p3",
            GroupName::p3m1 => "p3m1",
            GroupName::p31m => "p31m",
            GroupName::p6 => "p6",
            GroupName::p6mm => "p6mm",
        }
    }

    pub fn parse(s: &str) -> Result<GroupName, SymmetryError> {
        let lower = s.to_ascii_lowercase();
        GROUP_NAMES
            .iter()
            .copied()
            .find(|g| g.as_str() == lower)
            .ok_or_else(|| SymmetryError::UnknownGroup(s.to_string()))
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Crystal system of the conventional cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrystalSystem {
    Oblique,
    Rectangular,
    Square,
    Hexagonal,
}

/// Constraint class of the cell actually searched. Differs from the crystal
/// system only for the centered groups, whose primitive cell is a rhombus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    /// a, b, gamma free.
    Oblique,
    /// gamma = π/2.
    Rectangular,
    /// b = a, gamma free (primitive cell of the centered groups).
    Rhombic,
    /// b = a, gamma = π/2.
    Square,
    /// b = a, gamma = 2π/3.
    Hexagonal,
}

impl CellKind {
    pub fn dof(&self) -> usize {
        match self {
            CellKind::Oblique => 3,
            CellKind::Rectangular | CellKind::Rhombic => 2,
            CellKind::Square | CellKind::Hexagonal => 1,
        }
    }
}

/// A symmetry operation modulo lattice translations, in fractional
/// coordinates: `x ↦ M x + t` with integer `M` and `t` in half lattice
/// units (every plane group translation part is 0 or 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymOp {
    m: [[i32; 2]; 2],
    t_half: [i32; 2],
}

impl SymOp {
    const fn new(m: [[i32; 2]; 2], t_half: [i32; 2]) -> Self {
        SymOp { m, t_half }
    }

    pub fn identity() -> Self {
        SymOp::new([[1, 0], [0, 1]], [0, 0])
    }

    pub fn is_identity(&self) -> bool {
        *self == SymOp::identity()
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            self.m[0][0] as f64,
            self.m[0][1] as f64,
            self.m[1][0] as f64,
            self.m[1][1] as f64,
        )
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.t_half[0] as f64 / 2.0, self.t_half[1] as f64 / 2.0)
    }

    pub fn det(&self) -> i32 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self ∘ other`, translation reduced mod 1 (exact in half units).
    pub fn compose(&self, other: &SymOp) -> SymOp {
        let mut m = [[0i32; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.m[i][0] * other.m[0][j] + self.m[i][1] * other.m[1][j];
            }
        }
        let mut t = [0i32; 2];
        for i in 0..2 {
            t[i] = (self.m[i][0] * other.t_half[0] + self.m[i][1] * other.t_half[1]
                + self.t_half[i])
                .rem_euclid(2);
        }
        SymOp::new(m, t)
    }

    /// Image of a fractional point, reduced mod 1.
    pub fn apply_frac(&self, c: Vec2) -> Vec2 {
        let p = self.matrix() * c + self.translation();
        Vec2::new(p.x.rem_euclid(1.0), p.y.rem_euclid(1.0))
    }
}

/// Axis-aligned fractional box `[x0, x1] × [y0, y1]` used as the centroid
/// search domain. Always contains a fundamental domain of the group action,
/// so restricting the centroid to it loses no configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// One of the 17 plane groups: cell constraint, multiplicity, operations
/// modulo lattice translations, and the centroid box.
#[derive(Debug, Clone)]
pub struct PlaneGroupSpec {
    pub name: GroupName,
    pub system: CrystalSystem,
    /// True for cm and c2mm, which are searched in their primitive cell.
    pub centered: bool,
    pub multiplicity: usize,
    pub ops: Vec<SymOp>,
    pub asym_box: AsymBox,
}

impl PlaneGroupSpec {
    pub fn cell_kind(&self) -> CellKind {
        match (self.system, self.centered) {
            (CrystalSystem::Oblique, _) => CellKind::Oblique,
            (CrystalSystem::Rectangular, false) => CellKind::Rectangular,
            (CrystalSystem::Rectangular, true) => CellKind::Rhombic,
            (CrystalSystem::Square, _) => CellKind::Square,
            (CrystalSystem::Hexagonal, _) => CellKind::Hexagonal,
        }
    }
}

fn build_group(
    name: GroupName,
    system: CrystalSystem,
    centered: bool,
    ops: Vec<SymOp>,
    asym_box: AsymBox,
) -> PlaneGroupSpec {
    PlaneGroupSpec {
        name,
        system,
        centered,
        multiplicity: ops.len(),
        ops,
        asym_box,
    }
}

const I: [[i32; 2]; 2] = [[1, 0], [0, 1]];
const NEG_I: [[i32; 2]; 2] = [[-1, 0], [0, -1]];
const MIR_X: [[i32; 2]; 2] = [[-1, 0], [0, 1]]; // (−x, y)
const MIR_Y: [[i32; 2]; 2] = [[1, 0], [0, -1]]; // (x, −y)
const ROT4: [[i32; 2]; 2] = [[0, -1], [1, 0]]; // (−y, x)
const ROT4_INV: [[i32; 2]; 2] = [[0, 1], [-1, 0]]; // (y, −x)
const SWAP: [[i32; 2]; 2] = [[0, 1], [1, 0]]; // (y, x)
const NEG_SWAP: [[i32; 2]; 2] = [[0, -1], [-1, 0]]; // (−y, −x)
const ROT3: [[i32; 2]; 2] = [[0, -1], [1, -1]]; // (−y, x−y), hexagonal basis
const ROT3_SQ: [[i32; 2]; 2] = [[-1, 1], [-1, 0]]; // (−x+y, −x)
const ROT6: [[i32; 2]; 2] = [[1, -1], [1, 0]]; // (x−y, x)
const ROT6_INV: [[i32; 2]; 2] = [[0, 1], [-1, 1]]; // (y, −x+y)
const HEX_M1: [[i32; 2]; 2] = [[-1, 1], [0, 1]]; // (−x+y, y)
const HEX_M2: [[i32; 2]; 2] = [[1, 0], [1, -1]]; // (x, x−y)
const HEX_M3: [[i32; 2]; 2] = [[1, -1], [0, -1]]; // (x−y, −y)
const HEX_M4: [[i32; 2]; 2] = [[-1, 0], [-1, 1]]; // (−x, −x+y)

/// Operation tables follow the International Tables general positions, with
/// cm and c2mm rewritten in the primitive rhombic basis (the conventional
/// mirror swaps the two primitive generators).
fn catalog_vec() -> Vec<PlaneGroupSpec> {
    use CrystalSystem::*;
    let op = SymOp::new;
    let full = AsymBox {
        x0: 0.0,
        y0: 0.0,
        x1: 1.0,
        y1: 1.0,
    };
    let half_x = AsymBox {
        x0: 0.0,
        y0: 0.0,
        x1: 0.5,
        y1: 1.0,
    };
    let quarter = AsymBox {
        x0: 0.0,
        y0: 0.0,
        x1: 0.5,
        y1: 0.5,
    };
    let hex_box = AsymBox {
        x0: 0.0,
        y0: 0.0,
        x1: 2.0 / 3.0,
        y1: 2.0 / 3.0,
    };

    vec![
        build_group(GroupName::p1, Oblique, false, vec![op(I, [0, 0])], full),
        build_group(
            GroupName::p2,
            Oblique,
            false,
            vec![op(I, [0, 0]), op(NEG_I, [0, 0])],
            half_x,
        ),
        build_group(
            GroupName::pm,
            Rectangular,
            false,
            vec![op(I, [0, 0]), op(MIR_X, [0, 0])],
            half_x,
        ),
        build_group(
            GroupName::pg,
            Rectangular,
            false,
            vec![op(I, [0, 0]), op(MIR_X, [0, 1])],
            half_x,
        ),
        build_group(
            GroupName::cm,
            Rectangular,
            true,
            vec![op(I, [0, 0]), op(SWAP, [0, 0])],
            full,
        ),
        build_group(
            GroupName::p2mm,
            Rectangular,
            false,
            vec![
                op(I, [0, 0]),
                op(NEG_I, [0, 0]),
                op(MIR_X, [0, 0]),
                op(MIR_Y, [0, 0]),
            ],
            quarter,
        ),
        build_group(
            GroupName::p2mg,
            Rectangular,
            false,
            vec![
                op(I, [0, 0]),
                op(NEG_I, [0, 0]),
                op(MIR_X, [1, 0]),
                op(MIR_Y, [1, 0]),
            ],
            AsymBox {
                x0: 0.0,
                y0: 0.0,
                x1: 0.25,
                y1: 1.0,
            },
        ),
        build_group(
            GroupName::p2gg,
            Rectangular,
            false,
            vec![
                op(I, [0, 0]),
                op(NEG_I, [0, 0]),
                op(MIR_X, [1, 1]),
                op(MIR_Y, [1, 1]),
            ],
            quarter,
        ),
        build_group(
            GroupName::c2mm,
            Rectangular,
            true,
            vec![
                op(I, [0, 0]),
                op(NEG_I, [0, 0]),
                op(SWAP, [0, 0]),
                op(NEG_SWAP, [0, 0]),
            ],
            half_x,
        ),
        build_group(
            GroupName::p4,
            Square,
            false,
            vec![
                op(I, [0, 0]),
                op(NEG_I, [0, 0]),
                op(ROT4, [0, 0]),
                op(ROT4_INV, [0, 0]),
            ],
            quarter,
        ),
        build_group(
            GroupName::p4mm,
            Square,
            false,
            vec![
                op(I, [0, 0]),
                op(NEG_I, [0, 0]),
                op(ROT4, [0, 0]),
                op(ROT4_INV, [0, 0]),
                op(MIR_X, [0, 0]),
                op(MIR_Y, [0, 0]),
                op(SWAP, [0, 0]),
                op(NEG_SWAP, [0, 0]),
            ],
            quarter,
        ),
        build_group(
            GroupName::p4gm,
            Square,
            false,
            vec![
                op(I, [0, 0]),
                op(NEG_I, [0, 0]),
                op(ROT4, [0, 0]),
                op(ROT4_INV, [0, 0]),
                op(MIR_X, [1, 1]),
                op(MIR_Y, [1, 1]),
                op(SWAP, [1, 1]),
                op(NEG_SWAP, [1, 1]),
            ],
            quarter,
        ),
        build_group(
            GroupName::p3,
            Hexagonal,
            false,
            vec![op(I, [0, 0]), op(ROT3, [0, 0]), op(ROT3_SQ, [0, 0])],
            hex_box,
        ),
        build_group(
            GroupName::p3m1,
            Hexagonal,
            false,
            vec![
                op(I, [0, 0]),
                op(ROT3, [0, 0]),
                op(ROT3_SQ, [0, 0]),
                op(NEG_SWAP, [0, 0]),
                op(HEX_M1, [0, 0]),
                op(HEX_M2, [0, 0]),
            ],
            hex_box,
        ),
        build_group(
            GroupName::p31m,
            Hexagonal,
            false,
            vec![
                op(I, [0, 0]),
                op(ROT3, [0, 0]),
                op(ROT3_SQ, [0, 0]),
                op(SWAP, [0, 0]),
                op(HEX_M3, [0, 0]),
                op(HEX_M4, [0, 0]),
            ],
            hex_box,
        ),
        build_group(
            GroupName::p6,
            Hexagonal,
            false,
            vec![
                op(I, [0, 0]),
                op(ROT3, [0, 0]),
                op(ROT3_SQ, [0, 0]),
                op(NEG_I, [0, 0]),
                op(ROT6_INV, [0, 0]),
                op(ROT6, [0, 0]),
            ],
            hex_box,
        ),
        build_group(
            GroupName::p6mm,
            Hexagonal,
            false,
            vec![
                op(I, [0, 0]),
                op(ROT3, [0, 0]),
                op(ROT3_SQ, [0, 0]),
                op(NEG_I, [0, 0]),
                op(ROT6_INV, [0, 0]),
                op(ROT6, [0, 0]),
                op(NEG_SWAP, [0, 0]),
                op(HEX_M1, [0, 0]),
                op(HEX_M2, [0, 0]),
                op(SWAP, [0, 0]),
                op(HEX_M3, [0, 0]),
                op(HEX_M4, [0, 0]),
            ],
            hex_box,
        ),
    ]
}

/// All 17 plane groups, identity first in every op list.
pub fn group_catalog() -> &'static [PlaneGroupSpec] {
    static CATALOG: OnceLock<Vec<PlaneGroupSpec>> = OnceLock::new();
    CATALOG.get_or_init(catalog_vec)
}

pub fn group_by_name(name: GroupName) -> &'static PlaneGroupSpec {
    group_catalog().iter().find(|g| g.name == name).unwrap()
}

/// Primitive cell: generator lengths `a`, `b` and the angle `gamma` between
/// them. The basis matrix has the generators as columns, `a1 = (a, 0)` and
/// `a2 = (b cos γ, b sin γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl CellParams {
    pub fn new(kind: CellKind, a: f64, b: f64, gamma: f64) -> Result<Self, SymmetryError> {
        let cell = CellParams { a, b, gamma };
        if !cell.satisfies(kind) {
            return Err(SymmetryError::CellConstraint(kind));
        }
        let det = cell.det();
        if !(det > 0.0) {
            return Err(SymmetryError::DegenerateCell(det));
        }
        Ok(cell)
    }

    pub fn satisfies(&self, kind: CellKind) -> bool {
        const EPS: f64 = 1e-9;
        let right = (self.gamma - PI / 2.0).abs() < EPS;
        let hexa = (self.gamma - 2.0 * PI / 3.0).abs() < EPS;
        let equal = (self.a - self.b).abs() < EPS * self.a.max(self.b);
        let positive = self.a > 0.0 && self.b > 0.0 && self.gamma > 0.0 && self.gamma < PI;
        positive
            && match kind {
                CellKind::Oblique => true,
                CellKind::Rectangular => right,
                CellKind::Rhombic => equal,
                CellKind::Square => equal && right,
                CellKind::Hexagonal => equal && hexa,
            }
    }

    pub fn basis(&self) -> Mat2 {
        Mat2::new(
            self.a,
            self.b * self.gamma.cos(),
            0.0,
            self.b * self.gamma.sin(),
        )
    }

    /// Cell area, `a b sin γ`.
    pub fn det(&self) -> f64 {
        self.a * self.b * self.gamma.sin()
    }
}

/// One searched degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DofKind {
    FracX,
    FracY,
    MotifAngle,
    CellA,
    CellB,
    CellGamma,
}

/// Mapping from a point on the n-torus to configuration parameters.
///
/// Fractional coordinates map linearly (`θ/2π` across their interval, then
/// folded mod 1), the motif angle maps linearly across `[0, 2π/n)`, and
/// lengths and the cell angle map through `ℓ(θ) = lo + (hi−lo)(1−cos θ)/2`
/// so the search stays smooth and periodic while still reaching both
/// interval endpoints.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub group: GroupName,
    pub shape: Shape,
    pub kinds: Vec<DofKind>,
    /// Per-dimension (lo, hi) in value space.
    pub bounds: Vec<(f64, f64)>,
}

/// Cell parameter ranges for the search.
#[derive(Debug, Clone, Copy)]
pub struct CellBounds {
    pub len_lo: f64,
    pub len_hi: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
}

impl CellBounds {
    /// Defaults: generator lengths in `[width, 4·diameter]` (a generator
    /// below the motif width forces self-overlap, so nothing is lost), cell
    /// angle in `[π/6, 5π/6]` to exclude degenerate bases.
    pub fn for_shape(shape: &Shape) -> Self {
        CellBounds {
            len_lo: shape.width(),
            len_hi: 4.0 * shape.diameter(),
            gamma_lo: PI / 6.0,
            gamma_hi: 5.0 * PI / 6.0,
        }
    }
}

/// Build the torus layout for a shape searched in a group. Total dimension
/// is `3 + cell_dof` for polygons (two fractional coordinates, one motif
/// angle, plus the cell parameters) and one less for the disc, which has no
/// orientation.
pub fn dof_layout(group: &PlaneGroupSpec, shape: &Shape, cell: CellBounds) -> DofLayout {
    let mut kinds = Vec::new();
    let mut bounds = Vec::new();
    let b = group.asym_box;
    kinds.push(DofKind::FracX);
    bounds.push((b.x0, b.x1));
    kinds.push(DofKind::FracY);
    bounds.push((b.y0, b.y1));
    if let Shape::Polygon { n, .. } = shape {
        kinds.push(DofKind::MotifAngle);
        bounds.push((0.0, TAU / *n as f64));
    }
    match group.cell_kind() {
        CellKind::Oblique => {
            kinds.push(DofKind::CellA);
            bounds.push((cell.len_lo, cell.len_hi));
            kinds.push(DofKind::CellB);
            bounds.push((cell.len_lo, cell.len_hi));
            kinds.push(DofKind::CellGamma);
            bounds.push((cell.gamma_lo, cell.gamma_hi));
        }
        CellKind::Rectangular => {
            kinds.push(DofKind::CellA);
            bounds.push((cell.len_lo, cell.len_hi));
            kinds.push(DofKind::CellB);
            bounds.push((cell.len_lo, cell.len_hi));
        }
        CellKind::Rhombic => {
            kinds.push(DofKind::CellA);
            bounds.push((cell.len_lo, cell.len_hi));
            kinds.push(DofKind::CellGamma);
            bounds.push((cell.gamma_lo, cell.gamma_hi));
        }
        CellKind::Square | CellKind::Hexagonal => {
            kinds.push(DofKind::CellA);
            bounds.push((cell.len_lo, cell.len_hi));
        }
    }
    DofLayout {
        group: group.name,
        shape: *shape,
        kinds,
        bounds,
    }
}

impl DofLayout {
    pub fn count(&self) -> usize {
        self.kinds.len()
    }

    /// Map a torus point to per-dimension values.
    pub fn values(&self, theta: &[f64]) -> Vec<f64> {
        assert_eq!(theta.len(), self.count());
        self.kinds
            .iter()
            .zip(self.bounds.iter())
            .zip(theta.iter())
            .map(|((kind, &(lo, hi)), &t)| match kind {
                DofKind::FracX | DofKind::FracY => {
                    let u = (t / TAU).rem_euclid(1.0);
                    (lo + u * (hi - lo)).rem_euclid(1.0)
                }
                DofKind::MotifAngle => {
                    let u = (t / TAU).rem_euclid(1.0);
                    let n = match self.shape {
                        Shape::Polygon { n, .. } => n as f64,
                        Shape::Disc { .. } => unreachable!("disc has no motif angle"),
                    };
                    (lo + u * (hi - lo)).rem_euclid(TAU / n)
                }
                DofKind::CellA | DofKind::CellB | DofKind::CellGamma => {
                    lo + (hi - lo) * (1.0 - t.cos()) / 2.0
                }
            })
            .collect()
    }

    /// Assemble a configuration from per-dimension values.
    pub fn assemble(&self, values: &[f64]) -> crate::packing::Configuration {
        let group = group_by_name(self.group);
        let mut frac = Vec2::zeros();
        let mut angle = 0.0;
        let mut a = 1.0;
        let mut b = None;
        let mut gamma = None;
        for (kind, &v) in self.kinds.iter().zip(values.iter()) {
            match kind {
                DofKind::FracX => frac.x = v,
                DofKind::FracY => frac.y = v,
                DofKind::MotifAngle => angle = v,
                DofKind::CellA => a = v,
                DofKind::CellB => b = Some(v),
                DofKind::CellGamma => gamma = Some(v),
            }
        }
        let cell = match group.cell_kind() {
            CellKind::Oblique => CellParams {
                a,
                b: b.unwrap(),
                gamma: gamma.unwrap(),
            },
            CellKind::Rectangular => CellParams {
                a,
                b: b.unwrap(),
                gamma: PI / 2.0,
            },
            CellKind::Rhombic => CellParams {
                a,
                b: a,
                gamma: gamma.unwrap(),
            },
            CellKind::Square => CellParams {
                a,
                b: a,
                gamma: PI / 2.0,
            },
            CellKind::Hexagonal => CellParams {
                a,
                b: a,
                gamma: 2.0 * PI / 3.0,
            },
        };
        crate::packing::Configuration {
            group: self.group,
            cell,
            centroid: frac,
            motif_rotation: angle,
            shape: self.shape,
        }
    }
}

/// Decode a torus point into a full packing candidate.
pub fn decode(theta: &[f64], layout: &DofLayout) -> crate::packing::Configuration {
    layout.assemble(&layout.values(theta))
}

/// Expand the orbit of a motif under a group in a given cell: one Cartesian
/// shape per symmetry operation, centers reduced into the central cell.
///
/// For each op `(M, t)` the fractional center is `M c + t` mod 1, mapped
/// through the basis; a polygon's rotation is adjusted by the Cartesian
/// angle of `B M B⁻¹`, which the cell constraints make exactly orthogonal.
pub fn expand_orbit(
    group: &PlaneGroupSpec,
    cell: &CellParams,
    centroid: Vec2,
    motif_rotation: f64,
    shape: &Shape,
) -> Vec<Shape> {
    let basis = cell.basis();
    let inv = basis.try_inverse().expect("nondegenerate cell");
    let template = match *shape {
        Shape::Polygon {
            n, circumradius, ..
        } => Shape::Polygon {
            n,
            circumradius,
            center: Vec2::zeros(),
            rotation: motif_rotation.rem_euclid(TAU / n as f64),
        },
        Shape::Disc { radius, .. } => Shape::Disc {
            radius,
            center: Vec2::zeros(),
        },
    };
    group
        .ops
        .iter()
        .map(|op| {
            let frac = op.apply_frac(centroid);
            let linear = basis * op.matrix() * inv;
            let iso = Isometry::new(linear, basis * frac);
            apply_isometry(&template, &iso)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_disc, make_regular_ngon};
    use approx::assert_relative_eq;

    #[test]
    fn catalog_has_17_groups_with_standard_multiplicities() {
        let cat = group_catalog();
        assert_eq!(cat.len(), 17);
        let expect = [
            (GroupName::p1, 1),
            (GroupName::p2, 2),
            (GroupName::pm, 2),
            (GroupName::pg, 2),
            (GroupName::cm, 2),
            (GroupName::p2mm, 4),
            (GroupName::p2mg, 4),
            (GroupName::p2gg, 4),
            (GroupName::c2mm, 4),
            (GroupName::p4, 4),
            (GroupName::p4mm, 8),
            (GroupName::p4gm, 8),
            (GroupName::p3, 3),
            (GroupName::p3m1, 6),
            (GroupName::p31m, 6),
            (GroupName::p6, 6),
            (GroupName::p6mm, 12),
        ];
        for (name, mult) in expect {
            let g = group_by_name(name);
            assert_eq!(g.multiplicity, mult, "{name}");
            assert_eq!(g.ops.len(), mult, "{name}");
        }
    }

    #[test]
    fn every_group_is_closed_with_identity_first() {
        for g in group_catalog() {
            assert!(g.ops[0].is_identity(), "{}", g.name);
            for a in &g.ops {
                // Inverse exists in the list.
                assert!(
                    g.ops.iter().any(|b| a.compose(b).is_identity()),
                    "{}: missing inverse",
                    g.name
                );
                for b in &g.ops {
                    let c = a.compose(b);
                    assert!(
                        g.ops.contains(&c),
                        "{}: composition escapes the table",
                        g.name
                    );
                }
            }
        }
    }

    #[test]
    fn pg_glide_squares_to_identity() {
        let pg = group_by_name(GroupName::pg);
        let glide = pg.ops[1];
        assert!(glide.compose(&glide).is_identity());
    }

    #[test]
    fn p2_contains_two_fold_rotation() {
        let p2 = group_by_name(GroupName::p2);
        assert_eq!(p2.multiplicity, 2);
        assert_eq!(p2.ops[1].matrix(), Mat2::new(-1.0, 0.0, 0.0, -1.0));
    }

    fn sample_cell(kind: CellKind, a: f64, b: f64, gamma: f64) -> CellParams {
        match kind {
            CellKind::Oblique => CellParams { a, b, gamma },
            CellKind::Rectangular => CellParams {
                a,
                b,
                gamma: PI / 2.0,
            },
            CellKind::Rhombic => CellParams { a, b: a, gamma },
            CellKind::Square => CellParams {
                a,
                b: a,
                gamma: PI / 2.0,
            },
            CellKind::Hexagonal => CellParams {
                a,
                b: a,
                gamma: 2.0 * PI / 3.0,
            },
        }
    }

    #[test]
    fn ops_are_isometries_in_conforming_cells() {
        for g in group_catalog() {
            let cell = sample_cell(g.cell_kind(), 1.7, 2.4, 1.1);
            let basis = cell.basis();
            let inv = basis.try_inverse().unwrap();
            for op in &g.ops {
                let linear = basis * op.matrix() * inv;
                let err = (linear.transpose() * linear - Mat2::identity()).norm();
                assert!(err < 1e-12, "{}: op not orthogonal, err {err}", g.name);
            }
        }
    }

    #[test]
    fn dof_counts_match_formula() {
        let pent = make_regular_ngon(5, 1.0, Vec2::zeros(), 0.0).unwrap();
        let oct = make_regular_ngon(8, 1.0, Vec2::zeros(), 0.0).unwrap();
        let disc = make_disc(1.0, Vec2::zeros()).unwrap();

        let layout = |g: GroupName, s: &Shape| {
            let spec = group_by_name(g);
            dof_layout(spec, s, CellBounds::for_shape(s))
        };

        assert_eq!(layout(GroupName::p2, &pent).count(), 6);
        assert_eq!(
            layout(GroupName::p2, &pent).kinds,
            vec![
                DofKind::FracX,
                DofKind::FracY,
                DofKind::MotifAngle,
                DofKind::CellA,
                DofKind::CellB,
                DofKind::CellGamma
            ]
        );
        assert_eq!(layout(GroupName::p4, &oct).count(), 4);
        // Disc drops the motif angle: 2 fractional + 1 hexagonal cell length.
        assert_eq!(layout(GroupName::p3, &disc).count(), 3);

        // count = 3 + cell_dof (minus one for the disc) across all groups.
        for g in group_catalog() {
            assert_eq!(
                layout(g.name, &pent).count(),
                3 + g.cell_kind().dof(),
                "{}",
                g.name
            );
            assert_eq!(
                layout(g.name, &disc).count(),
                2 + g.cell_kind().dof(),
                "{}",
                g.name
            );
        }
    }

    #[test]
    fn decode_hits_interval_endpoints() {
        let pent = make_regular_ngon(5, 1.0, Vec2::zeros(), 0.0).unwrap();
        let spec = group_by_name(GroupName::p2);
        let mut bounds = CellBounds::for_shape(&pent);
        bounds.len_lo = 1.0;
        bounds.len_hi = 3.0;
        let layout = dof_layout(spec, &pent, bounds);

        let zero = vec![0.0; 6];
        let cfg = decode(&zero, &layout);
        assert_relative_eq!(cfg.cell.a, 1.0, epsilon = 1e-12);
        assert_relative_eq!(cfg.cell.b, 1.0, epsilon = 1e-12);
        assert_eq!(cfg.centroid, Vec2::zeros());

        let mut theta = zero.clone();
        theta[3] = PI; // cell_a component
        let cfg = decode(&theta, &layout);
        assert_relative_eq!(cfg.cell.a, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn decode_is_torus_periodic() {
        let pent = make_regular_ngon(5, 1.0, Vec2::zeros(), 0.0).unwrap();
        let spec = group_by_name(GroupName::p2);
        let layout = dof_layout(spec, &pent, CellBounds::for_shape(&pent));
        let theta = vec![0.3, 1.9, 5.2, 2.8, 0.7, 4.4];
        let base = layout.values(&theta);
        for k in 0..6 {
            let mut shifted = theta.clone();
            shifted[k] += TAU;
            let v = layout.values(&shifted);
            for (x, y) in base.iter().zip(v.iter()) {
                assert_relative_eq!(x, y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn decode_covers_ranges() {
        // 10^5 uniform torus samples must cover every coordinate's range
        // endpoints within 1e-3 of the full span.
        use rand::Rng;
        let pent = make_regular_ngon(5, 1.0, Vec2::zeros(), 0.0).unwrap();
        let spec = group_by_name(GroupName::p2);
        let layout = dof_layout(spec, &pent, CellBounds::for_shape(&pent));
        let mut rng = crate::rng::rng_for(42, 0, 0);
        let dim = layout.count();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for _ in 0..100_000 {
            let theta: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect();
            for (k, v) in layout.values(&theta).iter().enumerate() {
                lo[k] = lo[k].min(*v);
                hi[k] = hi[k].max(*v);
            }
        }
        for k in 0..dim {
            let (blo, bhi) = layout.bounds[k];
            let span = bhi - blo;
            assert!(lo[k] - blo < 1e-3 * span, "dim {k} low end uncovered");
            assert!(bhi - hi[k] < 1e-3 * span, "dim {k} high end uncovered");
        }
    }

    #[test]
    fn orbit_sizes_and_p2_image() {
        let pent = make_regular_ngon(5, 1.0, Vec2::zeros(), 0.2).unwrap();
        let cell = CellParams {
            a: 3.0,
            b: 4.0,
            gamma: 1.2,
        };
        let p1 = group_by_name(GroupName::p1);
        let orbit = expand_orbit(p1, &cell, Vec2::new(0.25, 0.25), 0.2, &pent);
        assert_eq!(orbit.len(), 1);
        let expected = cell.basis() * Vec2::new(0.25, 0.25);
        assert_relative_eq!((orbit[0].center() - expected).norm(), 0.0, epsilon = 1e-12);

        let p2 = group_by_name(GroupName::p2);
        let c = Vec2::new(0.3, 0.45);
        let orbit = expand_orbit(p2, &cell, c, 0.2, &pent);
        assert_eq!(orbit.len(), 2);
        let mirrored = cell.basis() * Vec2::new((-c.x).rem_euclid(1.0), (-c.y).rem_euclid(1.0));
        assert_relative_eq!((orbit[1].center() - mirrored).norm(), 0.0, epsilon = 1e-12);
        match (orbit[0], orbit[1]) {
            (Shape::Polygon { rotation: r0, .. }, Shape::Polygon { rotation: r1, .. }) => {
                // Rotation by π, reduced mod 2π/5.
                let expect = (r0 + PI).rem_euclid(TAU / 5.0);
                assert_relative_eq!(r1, expect, epsilon = 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn p3_disc_orbit_has_three_distinct_positions() {
        let disc = make_disc(0.3, Vec2::zeros()).unwrap();
        let p3 = group_by_name(GroupName::p3);
        let cell = CellParams {
            a: 2.0,
            b: 2.0,
            gamma: 2.0 * PI / 3.0,
        };
        let orbit = expand_orbit(p3, &cell, Vec2::new(0.15, 0.55), 0.0, &disc);
        assert_eq!(orbit.len(), 3);
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(
                    (orbit[i].center() - orbit[j].center()).norm() > 1e-6,
                    "positions coincide away from a three-fold fixed point"
                );
            }
        }
    }

    #[test]
    fn orbit_is_invariant_under_lattice_translation_of_centroid() {
        // Shifting the centroid by a lattice vector yields the same folded
        // Cartesian shape set.
        let pent = make_regular_ngon(5, 0.8, Vec2::zeros(), 0.15).unwrap();
        for g in group_catalog() {
            let cell = sample_cell(g.cell_kind(), 2.1, 2.9, 1.9);
            let c = Vec2::new(0.37, 0.21);
            let a = expand_orbit(g, &cell, c, 0.15, &pent);
            let shifted = Vec2::new(c.x + 1.0, c.y - 2.0);
            // apply_frac folds mod 1, so feed the raw shifted centroid
            // through the same path.
            let b_orbit = expand_orbit(g, &cell, shifted, 0.15, &pent);
            let mut ka: Vec<_> = a
                .iter()
                .map(|s| {
                    let c = s.center();
                    (format!("{:.9},{:.9}", c.x, c.y), *s)
                })
                .collect();
            let mut kb: Vec<_> = b_orbit
                .iter()
                .map(|s| {
                    let c = s.center();
                    (format!("{:.9},{:.9}", c.x, c.y), *s)
                })
                .collect();
            ka.sort_by(|x, y| x.0.cmp(&y.0));
            kb.sort_by(|x, y| x.0.cmp(&y.0));
            for ((_, sa), (_, sb)) in ka.iter().zip(kb.iter()) {
                assert!(
                    (sa.center() - sb.center()).norm() < 1e-9,
                    "{}: orbit not translation invariant",
                    g.name
                );
            }
        }
    }

    #[test]
    fn group_names_parse_case_insensitively() {
        assert_eq!(GroupName::parse("P4GM").unwrap(), GroupName::p4gm);
        assert_eq!(GroupName::parse("p6mm").unwrap(), GroupName::p6mm);
        assert!(GroupName::parse("p5").is_err());
    }
}
