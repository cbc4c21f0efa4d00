//! Configuration evaluation: orbit expansion over the periodic neighborhood,
//! total overlap violation, density, and feasibility verification.

use crate::geometry::{
    penetration_depth_offset, separation_gap, PreparedShape, Shape, Vec2, TAU,
};
use crate::symmetry::{
    expand_orbit, group_by_name, CellParams, GroupName, SymmetryError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PackingError {
    #[error("degenerate cell: area {0} is not positive")]
    DegenerateCell(f64),
    #[error("cell violates the group's crystal-system constraint")]
    CellConstraint,
    #[error("certificate error: {0}")]
    Certificate(String),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Shape(#[from] crate::geometry::ShapeError),
}

/// A full packing candidate: group, cell, motif pose, motif template.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub group: GroupName,
    pub cell: CellParams,
    /// Motif centroid in fractional coordinates, in `[0,1)²`.
    pub centroid: Vec2,
    /// Motif rotation in radians (ignored for the disc).
    pub motif_rotation: f64,
    /// Motif template; its center field is ignored.
    pub shape: Shape,
}

/// Feasibility and density report for one configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PackingReport {
    pub density: f64,
    /// Total penetration depth over all distinct pairs in the neighborhood.
    pub violation: f64,
    pub feasible: bool,
    /// Touching incidences per central shape at the verification tolerance.
    pub contacts: usize,
}

/// Contact tolerance used by the search: `1e-9 ·` motif diameter.
pub fn tau_contact(shape: &Shape) -> f64 {
    1e-9 * shape.diameter()
}

/// Looser tolerance for published configurations with truncated decimals:
/// `1e-4 ·` motif diameter.
pub fn tau_published(shape: &Shape) -> f64 {
    1e-4 * shape.diameter()
}

impl Configuration {
    fn checked_cell_area(&self) -> Result<f64, PackingError> {
        let det = self.cell.det();
        if !(det > 0.0) || !det.is_finite() {
            return Err(PackingError::DegenerateCell(det));
        }
        Ok(det)
    }

    /// Packing density `N area(K) / area(cell)`. No feasibility check.
    pub fn density(&self) -> Result<f64, PackingError> {
        let area = self.checked_cell_area()?;
        let group = group_by_name(self.group);
        Ok(group.multiplicity as f64 * self.shape.area() / area)
    }

    /// The N orbit shapes in the central cell, Cartesian coordinates.
    pub fn orbit(&self) -> Vec<Shape> {
        let group = group_by_name(self.group);
        expand_orbit(
            group,
            &self.cell,
            self.centroid,
            self.motif_rotation,
            &self.shape,
        )
    }

    /// Half-width of the neighbor block needed so that no overlap can be
    /// missed: shapes in cells beyond it are separated by more than the
    /// motif's circumscribed diameter. At the default length bounds this is
    /// 2 (the 5×5 block); it grows only for small, highly oblique cells.
    pub fn required_half_block(&self) -> usize {
        let r_c = match self.shape {
            Shape::Polygon { circumradius, .. } => circumradius,
            Shape::Disc { radius, .. } => radius,
        };
        let h = self.cell.a.min(self.cell.b) * self.cell.gamma.sin();
        if h <= 0.0 {
            return 2;
        }
        let needed = (2.0 * r_c / h).floor() as usize + 1;
        needed.max(2)
    }

    /// Sum of penetration depths over all distinct shape pairs drawn from
    /// the central-cell orbit against orbit copies in the
    /// `(2·half+1) × (2·half+1)` block of cells, each unordered pair counted
    /// once. Zero iff the configuration is a valid packing (up to contact).
    pub fn violation_block(&self, half: usize) -> Result<f64, PackingError> {
        self.checked_cell_area()?;
        let orbit = self.orbit();
        let prepared: Vec<PreparedShape> = orbit.iter().map(PreparedShape::new).collect();
        let basis = self.cell.basis();
        let a1 = basis.column(0).into_owned();
        let a2 = basis.column(1).into_owned();
        let n = prepared.len();
        let h = half as i64;

        let mut total = 0.0;
        // Intra-cell pairs, each once.
        for k in 0..n {
            for l in (k + 1)..n {
                total += penetration_depth_offset(
                    &prepared[k],
                    Vec2::zeros(),
                    &prepared[l],
                    Vec2::zeros(),
                );
            }
        }
        // Cross-cell pairs: a half-space of offsets covers each unordered
        // pair exactly once ((k, l, T) is the same pair as (l, k, -T)).
        for j in 0..=h {
            for i in -h..=h {
                if j == 0 && i <= 0 {
                    continue;
                }
                let offset = i as f64 * a1 + j as f64 * a2;
                for k in 0..n {
                    for l in 0..n {
                        total += penetration_depth_offset(
                            &prepared[k],
                            Vec2::zeros(),
                            &prepared[l],
                            offset,
                        );
                    }
                }
            }
        }
        Ok(total)
    }

    /// Violation over a block large enough to be exhaustive for this cell.
    pub fn violation(&self) -> Result<f64, PackingError> {
        self.violation_block(self.required_half_block())
    }

    /// Verify feasibility at tolerance `tau` and count contacts.
    pub fn verify(&self, tau: f64) -> Result<PackingReport, PackingError> {
        let density = self.density()?;
        let half = self.required_half_block();
        let violation = self.violation_block(half)?;
        let feasible = violation <= tau;

        // Contact incidences: for each central shape, neighbors in the full
        // block (all offsets, both intra-cell directions) within tau of
        // touching. A disc in a triangular lattice reports 6.
        let orbit = self.orbit();
        let prepared: Vec<PreparedShape> = orbit.iter().map(PreparedShape::new).collect();
        let basis = self.cell.basis();
        let a1 = basis.column(0).into_owned();
        let a2 = basis.column(1).into_owned();
        let n = prepared.len();
        let h = half as i64;
        let mut contacts = 0;
        for k in 0..n {
            for j in -h..=h {
                for i in -h..=h {
                    let offset = i as f64 * a1 + j as f64 * a2;
                    for l in 0..n {
                        if i == 0 && j == 0 && l == k {
                            continue;
                        }
                        let pen = penetration_depth_offset(
                            &prepared[k],
                            Vec2::zeros(),
                            &prepared[l],
                            offset,
                        );
                        if pen <= tau {
                            let gap =
                                separation_gap(&prepared[k], Vec2::zeros(), &prepared[l], offset);
                            if gap <= tau {
                                contacts += 1;
                            }
                        }
                    }
                }
            }
        }

        Ok(PackingReport {
            density,
            violation,
            feasible,
            contacts,
        })
    }

    /// Stratified Monte-Carlo estimate of the covered area fraction:
    /// `grid²` jittered points in the primitive cell tested for membership
    /// in any orbit copy. Independent of the closed-form density.
    pub fn monte_carlo_density(&self, grid: usize, seed: u64) -> Result<f64, PackingError> {
        use rand::Rng;
        self.checked_cell_area()?;
        let orbit = self.orbit();
        let prepared: Vec<PreparedShape> = orbit.iter().map(PreparedShape::new).collect();
        let basis = self.cell.basis();
        let a1 = basis.column(0).into_owned();
        let a2 = basis.column(1).into_owned();
        let h = self.required_half_block() as i64;
        let mut offsets = Vec::new();
        for j in -h..=h {
            for i in -h..=h {
                offsets.push(i as f64 * a1 + j as f64 * a2);
            }
        }
        let mut rng = crate::rng::rng_for(seed, 0x4d43, 0);
        let mut hits = 0usize;
        for gy in 0..grid {
            for gx in 0..grid {
                let u = (gx as f64 + rng.gen::<f64>()) / grid as f64;
                let v = (gy as f64 + rng.gen::<f64>()) / grid as f64;
                let p = basis * Vec2::new(u, v);
                let covered = offsets.iter().any(|off| {
                    prepared.iter().any(|s| match s {
                        PreparedShape::Disc { center, radius } => {
                            (p - (center + off)).norm_squared() <= radius * radius
                        }
                        PreparedShape::Poly { .. } => s.contains(p - off),
                    })
                });
                if covered {
                    hits += 1;
                }
            }
        }
        Ok(hits as f64 / (grid * grid) as f64)
    }

    pub fn to_certificate(&self) -> Certificate {
        let (n, circumradius, rotation) = match self.shape {
            Shape::Polygon {
                n, circumradius, ..
            } => (n, circumradius, self.motif_rotation),
            Shape::Disc { radius, .. } => (0, radius, 0.0),
        };
        Certificate {
            group: self.group.as_str().to_string(),
            n,
            circumradius,
            a: self.cell.a,
            b: self.cell.b,
            gamma_rad: self.cell.gamma,
            frac_x: self.centroid.x,
            frac_y: self.centroid.y,
            rotation_rad: rotation,
        }
    }
}

/// Flat serialized form of a configuration; the certificate format consumed
/// by `verify` and emitted by the optimizer. `n = 0` encodes the disc, with
/// `circumradius` then holding the disc radius.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Certificate {
    pub group: String,
    pub n: u32,
    pub circumradius: f64,
    pub a: f64,
    pub b: f64,
    pub gamma_rad: f64,
    pub frac_x: f64,
    pub frac_y: f64,
    pub rotation_rad: f64,
}

impl Certificate {
    pub fn into_configuration(self) -> Result<Configuration, PackingError> {
        let group = GroupName::parse(&self.group)?;
        let spec = group_by_name(group);
        let shape = if self.n == 0 {
            crate::geometry::make_disc(self.circumradius, Vec2::zeros())?
        } else {
            crate::geometry::make_regular_ngon(self.n, self.circumradius, Vec2::zeros(), 0.0)?
        };
        let cell = CellParams {
            a: self.a,
            b: self.b,
            gamma: self.gamma_rad,
        };
        if !cell.satisfies(spec.cell_kind()) {
            return Err(PackingError::CellConstraint);
        }
        let det = cell.det();
        if !(det > 0.0) {
            return Err(PackingError::DegenerateCell(det));
        }
        let rotation = if self.n == 0 {
            0.0
        } else {
            self.rotation_rad.rem_euclid(TAU / self.n as f64)
        };
        Ok(Configuration {
            group,
            cell,
            centroid: Vec2::new(self.frac_x.rem_euclid(1.0), self.frac_y.rem_euclid(1.0)),
            motif_rotation: rotation,
            shape,
        })
    }
}
